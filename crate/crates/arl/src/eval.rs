//! Trade-off analysis: accuracy/entropy metrics, non-dominated filtering and
//! normalized 2-D hypervolume.

use crate::error::{Error, Result};

/// One run's operating point: accuracies in percent, adversary entropy in
/// nats (bounded by ln m).
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub target_acc: f64,
    pub adv_acc: f64,
    pub adv_entropy: f64,
    pub variant: String,
    pub alpha: f64,
    pub seed: u64,
}

impl TradeoffPoint {
    pub fn new(target_acc: f64, adv_acc: f64, adv_entropy: f64) -> Self {
        TradeoffPoint {
            target_acc,
            adv_acc,
            adv_entropy,
            variant: String::new(),
            alpha: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// The two plotted objectives and their optimization directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectivePair {
    /// target accuracy (max) vs adversary accuracy (min)
    AccuracyAccuracy,
    /// target accuracy (max) vs adversary entropy (max)
    AccuracyEntropy,
}

impl ObjectivePair {
    pub fn directions(self) -> (Direction, Direction) {
        match self {
            ObjectivePair::AccuracyAccuracy => (Direction::Maximize, Direction::Minimize),
            ObjectivePair::AccuracyEntropy => (Direction::Maximize, Direction::Maximize),
        }
    }

    /// Extracts the (x, y) objective values from a point.
    pub fn project(self, p: &TradeoffPoint) -> (f64, f64) {
        match self {
            ObjectivePair::AccuracyAccuracy => (p.target_acc, p.adv_acc),
            ObjectivePair::AccuracyEntropy => (p.target_acc, p.adv_entropy),
        }
    }
}

/// Pairwise non-dominated subset under an objective pair.
#[derive(Debug, Clone)]
pub struct Front {
    pub objectives: ObjectivePair,
    pub points: Vec<TradeoffPoint>,
}

/// Signed "goodness" along one axis: higher is better after adjustment.
fn adjusted(v: f64, d: Direction) -> f64 {
    match d {
        Direction::Maximize => v,
        Direction::Minimize => -v,
    }
}

/// `a` dominates `b` iff `a` is no worse in both objectives and strictly
/// better in at least one.
fn dominates(a: (f64, f64), b: (f64, f64), dirs: (Direction, Direction)) -> bool {
    let ax = adjusted(a.0, dirs.0);
    let ay = adjusted(a.1, dirs.1);
    let bx = adjusted(b.0, dirs.0);
    let by = adjusted(b.1, dirs.1);
    ax >= bx && ay >= by && (ax > bx || ay > by)
}

/// Retains exactly the non-dominated points, preserving input order.
/// Exact duplicates keep the first occurrence.
pub fn nondominated(points: &[TradeoffPoint], objectives: ObjectivePair) -> Front {
    let dirs = objectives.directions();
    let projected: Vec<(f64, f64)> = points.iter().map(|p| objectives.project(p)).collect();
    let mut keep = Vec::new();
    for (i, &pi) in projected.iter().enumerate() {
        let dominated = projected.iter().enumerate().any(|(j, &pj)| {
            if i == j {
                return false;
            }
            dominates(pj, pi, dirs) || (pj == pi && j < i)
        });
        if !dominated {
            keep.push(points[i].clone());
        }
    }
    Front {
        objectives,
        points: keep,
    }
}

/// Normalizes into the unit box: accuracy axes divided by 100, entropy by
/// ln m. Rejects entropies above the ln m ceiling.
pub fn normalize(points: &[TradeoffPoint], m: usize) -> Result<Vec<TradeoffPoint>> {
    let ceiling = (m as f64).ln();
    points
        .iter()
        .map(|p| {
            if p.adv_entropy > ceiling + 1e-9 {
                return Err(Error::Invalid(format!(
                    "adversary entropy {} exceeds ln {m} = {ceiling}",
                    p.adv_entropy
                )));
            }
            Ok(TradeoffPoint {
                target_acc: p.target_acc / 100.0,
                adv_acc: p.adv_acc / 100.0,
                adv_entropy: p.adv_entropy / ceiling,
                ..p.clone()
            })
        })
        .collect()
}

/// Area of the normalized unit-box region dominated by the front, computed
/// by a sorted staircase sweep. Reference corner is (0,1) for
/// (maximize, minimize) pairs and (0,0) for (maximize, maximize).
pub fn hypervolume_2d(points: &[TradeoffPoint], objectives: ObjectivePair) -> Result<f64> {
    let dirs = objectives.directions();
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| objectives.project(p)).collect();
    for &(x, y) in &pts {
        if !(-1e-9..=1.0 + 1e-9).contains(&x) || !(-1e-9..=1.0 + 1e-9).contains(&y) {
            return Err(Error::Invalid(format!(
                "hypervolume expects normalized points, got ({x}, {y})"
            )));
        }
    }
    // Sort by x descending and sweep; each point contributes a strip of
    // width x between the best y seen so far and its own y.
    pts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut area = 0.0;
    match dirs.1 {
        Direction::Minimize => {
            let mut y_best = 1.0;
            for (x, y) in pts {
                if y < y_best {
                    area += x * (y_best - y);
                    y_best = y;
                }
            }
        }
        Direction::Maximize => {
            let mut y_best = 0.0;
            for (x, y) in pts {
                if y > y_best {
                    area += x * (y - y_best);
                    y_best = y;
                }
            }
        }
    }
    Ok(area)
}

/// Fraction of correct predictions, in percent.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "accuracy needs equal nonempty slices, got {} and {}",
            predictions.len(),
            labels.len()
        )));
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(100.0 * hits as f64 / labels.len() as f64)
}

/// Mean Shannon entropy of probability rows, in nats.
pub fn mean_entropy(probability_rows: &[Vec<f64>]) -> Result<f64> {
    if probability_rows.is_empty() {
        return Err(Error::Invalid("mean_entropy of empty input".into()));
    }
    let total: f64 = probability_rows
        .iter()
        .map(|row| -row.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>())
        .sum();
    Ok(total / probability_rows.len() as f64)
}

/// Writes retained points plus a summary HV line, plot-ready.
pub fn write_front_csv(path: &std::path::Path, front: &Front, hv: f64) -> Result<()> {
    let mut out = String::from("target_acc,adv_acc,adv_entropy,variant,alpha,seed\n");
    for p in &front.points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.target_acc, p.adv_acc, p.adv_entropy, p.variant, p.alpha, p.seed
        ));
    }
    out.push_str(&format!("# hypervolume,{hv}\n"));
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}
