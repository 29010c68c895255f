fn main() {
    std::process::exit(arl::cli::run(std::env::args_os()));
}
