fn main() {
    std::process::exit(eta_hessian::cli::run(std::env::args_os()));
}
