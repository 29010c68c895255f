//! The linear three-player game: closed-form vector field, Jacobian
//! linearization, eigenvalue stability classification, trajectory
//! integration and streamline-grid export.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::sigmoid;
use crate::error::{Error, Result};

/// Which encoder objective drives the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Zero-sum: encoder minimizes v2 − α·v1.
    Ml,
    /// Non-zero-sum: encoder minimizes v2 + α·KL(q_D‖U).
    Maxent,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Ml => "ml",
            Variant::Maxent => "maxent",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ml" => Ok(Variant::Ml),
            "maxent" => Ok(Variant::Maxent),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

/// Discriminator parameterization of the linear game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameForm {
    /// Discriminator logit u = w1·w2.
    Bilinear,
    /// Discriminator logit u = w1² + w2 (bias form).
    Quadratic,
}

impl std::str::FromStr for GameForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilinear" => Ok(GameForm::Bilinear),
            "quadratic" => Ok(GameForm::Quadratic),
            other => Err(Error::Config(format!("unknown game form '{other}'"))),
        }
    }
}

/// Linear encoder/discriminator/predictor with scalar weights (w1, w2, w3),
/// fed the fixed sample x = 1 under the four (t, s) label pairs
/// {00, 01, 10, 11}. Losses are means over exactly those 4 samples.
#[derive(Debug, Clone, Copy)]
pub struct LinearGame {
    pub variant: Variant,
    pub alpha: f64,
    pub form: GameForm,
}

impl LinearGame {
    pub fn new(variant: Variant, alpha: f64) -> Self {
        LinearGame {
            variant,
            alpha,
            form: GameForm::Bilinear,
        }
    }

    fn logits(&self, w: [f64; 3]) -> (f64, f64) {
        let [w1, w2, w3] = w;
        let u = match self.form {
            GameForm::Bilinear => w1 * w2,
            GameForm::Quadratic => w1 * w1 + w2,
        };
        (u, w1 * w3)
    }

    /// ∂u/∂w1 and ∂u/∂w2 for the active discriminator form.
    fn du(&self, w: [f64; 3]) -> (f64, f64) {
        match self.form {
            GameForm::Bilinear => (w[1], w[0]),
            GameForm::Quadratic => (2.0 * w[0], 1.0),
        }
    }

    /// Mean sigmoid cross-entropy over the 4 samples; labels are balanced,
    /// so the mean reduces to ½(−ln σ(z) − ln(1 − σ(z))).
    fn balanced_ce(z: f64) -> f64 {
        // −ln σ(z) = softplus(−z), −ln(1−σ(z)) = softplus(z)
        0.5 * (softplus(-z) + softplus(z))
    }

    /// Discriminator's own loss v1 at w.
    pub fn disc_loss(&self, w: [f64; 3]) -> f64 {
        let (u, _) = self.logits(w);
        Self::balanced_ce(u)
    }

    /// Predictor's own loss v2 at w.
    pub fn pred_loss(&self, w: [f64; 3]) -> f64 {
        let (_, v) = self.logits(w);
        Self::balanced_ce(v)
    }

    /// Encoder's own loss at w: v2 − α·v1 (ml) or v2 + α·KL(q_D‖U) (maxent).
    pub fn enc_loss(&self, w: [f64; 3]) -> f64 {
        let (u, _) = self.logits(w);
        match self.variant {
            Variant::Ml => self.pred_loss(w) - self.alpha * self.disc_loss(w),
            Variant::Maxent => {
                let p = sigmoid(u);
                // KL((p,1−p) ‖ U) = ln 2 − H(p); ln(p/(1−p)) = u exactly.
                let h = -(xlnx(p) + xlnx(1.0 - p));
                self.pred_loss(w) + self.alpha * (std::f64::consts::LN_2 - h)
            }
        }
    }

    /// Negative gradient of each player's own loss, in closed form.
    pub fn field(&self, w: [f64; 3]) -> [f64; 3] {
        let [w1, _, w3] = w;
        let (u, v) = self.logits(w);
        let (du1, du2) = self.du(w);
        let ps = sigmoid(u) - 0.5;
        let pt = sigmoid(v) - 0.5;
        let f_disc = -ps * du2;
        let f_pred = -pt * w1;
        let g = match self.variant {
            Variant::Ml => -self.alpha * ps * du1,
            // d/du KL((σ(u),1−σ(u)) ‖ U) = u·σ'(u)
            Variant::Maxent => self.alpha * u * dsigmoid(u) * du1,
        };
        let f_enc = -(pt * w3 + g);
        [f_enc, f_disc, f_pred]
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

fn dsigmoid(u: f64) -> f64 {
    let s = sigmoid(u);
    s * (1.0 - s)
}

/// Central-difference Jacobian of a 3-D vector field.
pub fn jacobian<F>(field: F, point: [f64; 3], h: f64) -> Result<[[f64; 3]; 3]>
where
    F: Fn([f64; 3]) -> [f64; 3],
{
    if h <= 0.0 {
        return Err(Error::Invalid(format!("step h must be positive, got {h}")));
    }
    let mut j = [[0.0; 3]; 3];
    for col in 0..3 {
        let mut plus = point;
        let mut minus = point;
        plus[col] += h;
        minus[col] -= h;
        let fp = field(plus);
        let fm = field(minus);
        for row in 0..3 {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Complex number as (re, im); enough for cubic root extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }

    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }

    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    fn scale(self, c: f64) -> Complex {
        Complex::new(self.re * c, self.im * c)
    }

    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    fn sqrt(self) -> Complex {
        let r = self.abs();
        let theta = self.im.atan2(self.re);
        Complex::from_polar(r.sqrt(), theta / 2.0)
    }

    fn cbrt(self) -> Complex {
        let r = self.abs();
        let theta = self.im.atan2(self.re);
        Complex::from_polar(r.cbrt(), theta / 3.0)
    }

    fn from_polar(r: f64, theta: f64) -> Complex {
        Complex::new(r * theta.cos(), r * theta.sin())
    }
}

/// Roots of the characteristic cubic of a 3×3 matrix, via Cardano with
/// complex handling, sorted by real part descending.
pub fn eigenvalues(j: &[[f64; 3]; 3]) -> Result<[Complex; 3]> {
    if j.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("jacobian entries".into()));
    }
    // λ³ − c2 λ² + c1 λ − c0 with c2 = tr, c1 = Σ principal 2×2 minors, c0 = det.
    let tr = j[0][0] + j[1][1] + j[2][2];
    let minors = j[1][1] * j[2][2] - j[1][2] * j[2][1]
        + j[0][0] * j[2][2] - j[0][2] * j[2][0]
        + j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);

    // Depressed cubic t³ + p t + q with λ = t + c2/3.
    let shift = tr / 3.0;
    let p = minors - tr * tr / 3.0;
    let q = -2.0 * tr * tr * tr / 27.0 + tr * minors / 3.0 - det;

    let mut roots = if p == 0.0 && q == 0.0 {
        [Complex::new(0.0, 0.0); 3]
    } else {
        let half_q = Complex::new(-q / 2.0, 0.0);
        let disc = Complex::new(q * q / 4.0 + p * p * p / 27.0, 0.0);
        let mut u = half_q.add(disc.sqrt()).cbrt();
        if u.abs() < 1e-300 {
            u = half_q.sub(disc.sqrt()).cbrt();
        }
        let v = Complex::new(-p / 3.0, 0.0).mul(Complex::new(u.re, -u.im)).scale(1.0 / (u.abs() * u.abs()));
        // v = −p/(3u); computed via conjugate to avoid a complex division helper.
        let omega = Complex::new(-0.5, 3.0f64.sqrt() / 2.0);
        let omega2 = Complex::new(-0.5, -(3.0f64.sqrt()) / 2.0);
        [
            u.add(v),
            omega.mul(u).add(omega2.mul(v)),
            omega2.mul(u).add(omega.mul(v)),
        ]
    };
    for r in &mut roots {
        r.re += shift;
        // Clean tiny imaginary residue from the complex arithmetic.
        if r.im.abs() < 1e-12 * (1.0 + r.re.abs()) {
            r.im = 0.0;
        }
    }
    roots.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    AsymptoticallyStable,
    Unstable,
    /// Largest real part within tolerance of zero; the linearization does
    /// not decide.
    Inconclusive,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::AsymptoticallyStable => "asymptotically_stable",
            Stability::Unstable => "unstable",
            Stability::Inconclusive => "inconclusive",
        })
    }
}

pub const STABILITY_TOL: f64 = 1e-9;

/// Three-way verdict from eigenvalue real parts: stable if all < −tol,
/// unstable if any > +tol, otherwise inconclusive (center case).
pub fn classify_stability(eigs: &[Complex; 3]) -> Stability {
    let max_re = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re < -STABILITY_TOL {
        Stability::AsymptoticallyStable
    } else if eigs.iter().any(|e| e.re > STABILITY_TOL) {
        Stability::Unstable
    } else {
        Stability::Inconclusive
    }
}

/// Coordinates held fixed during integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Frozen {
    pub w1: bool,
    pub w2: bool,
    pub w3: bool,
}

impl Frozen {
    pub fn none() -> Self {
        Frozen::default()
    }

    fn mask(&self, f: &mut [f64; 3]) {
        if self.w1 {
            f[0] = 0.0;
        }
        if self.w2 {
            f[1] = 0.0;
        }
        if self.w3 {
            f[2] = 0.0;
        }
    }
}

impl std::str::FromStr for Frozen {
    type Err = Error;
    /// Comma-separated subset of {w1,w2,w3}; empty or "none" freezes nothing.
    fn from_str(s: &str) -> Result<Self> {
        let mut frozen = Frozen::none();
        if s.is_empty() || s == "none" {
            return Ok(frozen);
        }
        for part in s.split(',') {
            match part.trim() {
                "w1" => frozen.w1 = true,
                "w2" => frozen.w2 = true,
                "w3" => frozen.w3 = true,
                other => return Err(Error::Config(format!("unknown coordinate '{other}'"))),
            }
        }
        Ok(frozen)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub start: [f64; 3],
    /// (step index, state, ‖f‖) samples, every `record_stride` steps plus
    /// the final state.
    pub samples: Vec<(usize, [f64; 3], f64)>,
    pub final_state: [f64; 3],
    pub final_field_norm: f64,
    pub diverged: bool,
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Classical fixed-step RK4 along the field. Frozen coordinates have their
/// field components zeroed. Terminates early with a flag if ‖w‖ > 1e3.
pub fn integrate<F>(
    field: F,
    start: [f64; 3],
    dt: f64,
    steps: usize,
    frozen: Frozen,
    record_stride: usize,
) -> Result<Trajectory>
where
    F: Fn([f64; 3]) -> [f64; 3],
{
    if dt <= 0.0 {
        return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
    }
    let stride = record_stride.max(1);
    let eval = |w: [f64; 3]| {
        let mut f = field(w);
        frozen.mask(&mut f);
        f
    };
    let mut w = start;
    let mut samples = Vec::new();
    let mut diverged = false;
    samples.push((0, w, norm3(eval(w))));
    let mut step = 0;
    while step < steps {
        let k1 = eval(w);
        let k2 = eval(add_scaled(w, k1, dt / 2.0));
        let k3 = eval(add_scaled(w, k2, dt / 2.0));
        let k4 = eval(add_scaled(w, k3, dt));
        for i in 0..3 {
            w[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        step += 1;
        if norm3(w) > 1e3 {
            diverged = true;
            samples.push((step, w, norm3(eval(w))));
            break;
        }
        if step % stride == 0 || step == steps {
            samples.push((step, w, norm3(eval(w))));
        }
    }
    let final_field_norm = norm3(eval(w));
    Ok(Trajectory {
        start,
        samples,
        final_state: w,
        final_field_norm,
        diverged,
    })
}

fn add_scaled(w: [f64; 3], k: [f64; 3], c: f64) -> [f64; 3] {
    [w[0] + c * k[0], w[1] + c * k[1], w[2] + c * k[2]]
}

/// Lattice of n³ points over `[lo, hi]³`.
pub fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<[f64; 3]> {
    assert!(n >= 2, "grid needs n >= 2");
    let coord = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut pts = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                pts.push([coord(i), coord(j), coord(k)]);
            }
        }
    }
    pts
}

/// Streamline grid CSV: rows (w1,w2,w3,f1,f2,f3) over the lattice.
pub fn grid_export(path: &Path, game: &LinearGame, lo: f64, hi: f64, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Invalid(format!("grid n must be >= 2, got {n}")));
    }
    let mut out = String::from("w1,w2,w3,f1,f2,f3\n");
    for w in grid_points(lo, hi, n) {
        let f = game.field(w);
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            w[0], w[1], w[2], f[0], f[1], f[2]
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut out = String::from("step,w1,w2,w3,field_norm\n");
    for &(step, w, fnorm) in &trajectory.samples {
        out.push_str(&format!(
            "{step},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            w[0], w[1], w[2], fnorm
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Equilibrium analysis plus integrated trajectories for one game setting.
#[derive(Debug, Clone)]
pub struct DynamicsReport {
    pub variant: Variant,
    pub alpha: f64,
    pub form: GameForm,
    pub equilibrium: [f64; 3],
    pub jacobian: [[f64; 3]; 3],
    pub eigenvalues: [Complex; 3],
    pub verdict: Stability,
    pub trajectories: Vec<Trajectory>,
}

impl DynamicsReport {
    pub fn analyze(game: &LinearGame, equilibrium: [f64; 3]) -> Result<DynamicsReport> {
        let j = jacobian(|w| game.field(w), equilibrium, 1e-6)?;
        let eigs = eigenvalues(&j)?;
        Ok(DynamicsReport {
            variant: game.variant,
            alpha: game.alpha,
            form: game.form,
            equilibrium,
            jacobian: j,
            eigenvalues: eigs,
            verdict: classify_stability(&eigs),
            trajectories: Vec::new(),
        })
    }

    /// Key-value report text; one `key value...` pair per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("ARLDYN v1\n");
        out.push_str(&format!("variant {}\n", self.variant));
        out.push_str(&format!("alpha {}\n", self.alpha));
        out.push_str(&format!(
            "game_form {}\n",
            match self.form {
                GameForm::Bilinear => "bilinear",
                GameForm::Quadratic => "quadratic",
            }
        ));
        out.push_str(&format!(
            "equilibrium {:.16e} {:.16e} {:.16e}\n",
            self.equilibrium[0], self.equilibrium[1], self.equilibrium[2]
        ));
        for (i, row) in self.jacobian.iter().enumerate() {
            out.push_str(&format!(
                "jacobian_row{} {:.16e} {:.16e} {:.16e}\n",
                i, row[0], row[1], row[2]
            ));
        }
        for (i, e) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("eigenvalue{} {:.16e} {:.16e}\n", i, e.re, e.im));
        }
        out.push_str(&format!("verdict {}\n", self.verdict));
        for t in &self.trajectories {
            out.push_str(&format!(
                "trajectory_start {:.16e} {:.16e} {:.16e}\n",
                t.start[0], t.start[1], t.start[2]
            ));
            out.push_str(&format!(
                "trajectory_final {:.16e} {:.16e} {:.16e} field_norm {:.16e} diverged {}\n",
                t.final_state[0], t.final_state[1], t.final_state[2], t.final_field_norm, t.diverged
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::finite_difference_grad;
    use rand::Rng;
    use rand::SeedableRng;

    fn all_games() -> Vec<LinearGame> {
        let mut games = Vec::new();
        for variant in [Variant::Ml, Variant::Maxent] {
            for form in [GameForm::Bilinear, GameForm::Quadratic] {
                games.push(LinearGame {
                    variant,
                    alpha: 1.0,
                    form,
                });
            }
        }
        games
    }

    #[test]
    fn origin_is_stationary() {
        for game in all_games() {
            let f = game.field([0.0, 0.0, 0.0]);
            assert!(norm3(f) < 1e-15, "{game:?}: {f:?}");
        }
    }

    #[test]
    fn small_displacement_ml_field() {
        // σ(1e-4) − ½ ≈ 2.5e-5; f ≈ (+2.5e-7, −2.5e-7, 0) in (enc, disc, pred).
        let game = LinearGame::new(Variant::Ml, 1.0);
        let f = game.field([0.01, 0.01, 0.0]);
        assert!((f[0] - 2.5e-7).abs() < 1e-9, "f_enc = {}", f[0]);
        assert!((f[1] + 2.5e-7).abs() < 1e-9, "f_disc = {}", f[1]);
        assert_eq!(f[2], 0.0);
    }

    #[test]
    fn field_matches_finite_differences_of_player_losses() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for game in all_games() {
            for _ in 0..20 {
                let w = [
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.5..0.5),
                ];
                let f = game.field(w);
                let grads = [
                    finite_difference_grad(|x| Ok(game.enc_loss([x[0], w[1], w[2]])), &[w[0]], 1e-6)
                        .unwrap()[0],
                    finite_difference_grad(|x| Ok(game.disc_loss([w[0], x[0], w[2]])), &[w[1]], 1e-6)
                        .unwrap()[0],
                    finite_difference_grad(|x| Ok(game.pred_loss([w[0], w[1], x[0]])), &[w[2]], 1e-6)
                        .unwrap()[0],
                ];
                for i in 0..3 {
                    assert!(
                        (f[i] + grads[i]).abs() < 1e-8,
                        "{game:?} at {w:?}: f[{i}]={} -grad={}",
                        f[i],
                        -grads[i]
                    );
                }
            }
        }
    }

    #[test]
    fn jacobian_of_linear_decay() {
        let j = jacobian(|w| [-w[0], -w[1], -w[2]], [0.3, -0.1, 0.7], 1e-6).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let expected = if r == c { -1.0 } else { 0.0 };
                assert!((j[r][c] - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn jacobian_of_rotation() {
        let j = jacobian(|w| [-w[1], w[0], 0.0], [0.0; 3], 1e-6).unwrap();
        let expected = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        for r in 0..3 {
            for c in 0..3 {
                assert!((j[r][c] - expected[r][c]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn linear_game_jacobian_vanishes_at_origin() {
        for variant in [Variant::Ml, Variant::Maxent] {
            let game = LinearGame::new(variant, 1.0);
            let j = jacobian(|w| game.field(w), [0.0; 3], 1e-6).unwrap();
            for row in j {
                for v in row {
                    assert!(v.abs() < 1e-9, "{variant:?}: {v}");
                }
            }
        }
    }

    #[test]
    fn eigenvalues_diagonal() {
        let j = [[-1.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, -3.0]];
        let eigs = eigenvalues(&j).unwrap();
        let res: Vec<f64> = eigs.iter().map(|e| e.re).collect();
        assert!((res[0] + 1.0).abs() < 1e-9);
        assert!((res[1] + 2.0).abs() < 1e-9);
        assert!((res[2] + 3.0).abs() < 1e-9);
        assert!(eigs.iter().all(|e| e.im == 0.0));
    }

    #[test]
    fn eigenvalues_rotation_block() {
        let j = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        let eigs = eigenvalues(&j).unwrap();
        let mut ims: Vec<f64> = eigs.iter().map(|e| e.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(eigs.iter().all(|e| e.re.abs() < 1e-9));
        assert!((ims[0] + 1.0).abs() < 1e-9);
        assert!(ims[1].abs() < 1e-9);
        assert!((ims[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eigenvalue_trace_det_identities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            // Random symmetric matrix: eigenvalues real; check Σλ = tr, Πλ = det.
            let (a, b, c) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let (d, e, f) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let j = [[a, d, e], [d, b, f], [e, f, c]];
            let eigs = eigenvalues(&j).unwrap();
            let tr = a + b + c;
            let det = a * (b * c - f * f) - d * (d * c - f * e) + e * (d * f - b * e);
            let sum: f64 = eigs.iter().map(|x| x.re).sum();
            let prod = eigs.iter().fold(Complex::new(1.0, 0.0), |acc, &x| acc.mul(x));
            assert!((sum - tr).abs() < 1e-9, "trace: {sum} vs {tr}");
            assert!((prod.re - det).abs() < 1e-9, "det: {} vs {det}", prod.re);
        }
    }

    #[test]
    fn stability_verdicts() {
        let stable = [
            Complex::new(-1.0, 0.0),
            Complex::new(-2.0, 0.0),
            Complex::new(-3.0, 0.0),
        ];
        assert_eq!(classify_stability(&stable), Stability::AsymptoticallyStable);
        let unstable = [
            Complex::new(0.1, 0.0),
            Complex::new(-1.0, 0.0),
            Complex::new(-1.0, 0.0),
        ];
        assert_eq!(classify_stability(&unstable), Stability::Unstable);
        let center = [
            Complex::new(0.0, 1.0),
            Complex::new(0.0, -1.0),
            Complex::new(0.0, 0.0),
        ];
        assert_eq!(classify_stability(&center), Stability::Inconclusive);
    }

    #[test]
    fn integrate_fixed_point() {
        let game = LinearGame::new(Variant::Ml, 1.0);
        let t = integrate(|w| game.field(w), [0.0; 3], 0.1, 1000, Frozen::none(), 100).unwrap();
        assert_eq!(t.final_state, [0.0; 3]);
        assert!(!t.diverged);
    }

    #[test]
    fn integrate_flags_divergence() {
        let t = integrate(|w| [w[0], 0.0, 0.0], [1.0, 0.0, 0.0], 0.5, 100, Frozen::none(), 10).unwrap();
        assert!(t.diverged);
    }

    #[test]
    fn ml_conservation_identity_on_grid() {
        // w1·f_enc + α·w2·f_disc = 0 exactly for the bilinear ml slice w3 = 0.
        let alpha = 1.0;
        let game = LinearGame::new(Variant::Ml, alpha);
        for w in grid_points(-0.01, 0.01, 10) {
            let w = [w[0], w[1], 0.0];
            let f = game.field(w);
            let c = w[0] * f[0] + alpha * w[1] * f[1];
            assert!(c.abs() < 1e-15, "at {w:?}: {c}");
        }
    }

    #[test]
    fn maxent_lyapunov_decrease_on_grid() {
        let game = LinearGame::new(Variant::Maxent, 1.0);
        for w in grid_points(-0.01, 0.01, 10) {
            let w = [w[0], w[1], 0.0];
            if w[0] * w[1] == 0.0 {
                continue;
            }
            let f = game.field(w);
            let d = w[0] * f[0] + w[1] * f[1];
            assert!(d < 0.0, "at {w:?}: {d}");
        }
    }

    #[test]
    fn field_vanishes_on_w1_zero_slice() {
        for game in [LinearGame::new(Variant::Ml, 1.0), LinearGame::new(Variant::Maxent, 1.0)] {
            for &w2 in &[-0.01, 0.0, 0.005] {
                for &w3 in &[-0.01, 0.0, 0.01] {
                    let f = game.field([0.0, w2, w3]);
                    assert!(norm3(f) < 1e-15, "{game:?} at (0,{w2},{w3}): {f:?}");
                }
            }
        }
    }

    #[test]
    fn grid_export_counts_and_center() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        let game = LinearGame::new(Variant::Ml, 1.0);
        grid_export(&path, &game, -0.01, 0.01, 2).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 9); // header + 2³ rows

        // Every exported row's field matches pointwise evaluation.
        for line in text.lines().skip(1) {
            let vals: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            let f = game.field([vals[0], vals[1], vals[2]]);
            for i in 0..3 {
                assert_eq!(f[i], vals[3 + i]);
            }
        }

        // Odd n includes the exact center with zero field.
        grid_export(&path, &game, -0.01, 0.01, 3).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let center = text
            .lines()
            .find(|l| l.starts_with("0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0"))
            .expect("center row present");
        let vals: Vec<f64> = center.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(&vals[3..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn report_renders_all_keys() {
        let game = LinearGame::new(Variant::Maxent, 1.0);
        let report = DynamicsReport::analyze(&game, [0.0; 3]).unwrap();
        let text = report.render();
        for key in ["variant", "alpha", "game_form", "equilibrium", "jacobian_row0", "eigenvalue2", "verdict"] {
            assert!(text.contains(key), "missing {key}:\n{text}");
        }
        assert!(text.contains("inconclusive"));
    }
}
