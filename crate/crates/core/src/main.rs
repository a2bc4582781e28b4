fn main() {
    std::process::exit(dyadic_approx::cli::run(std::env::args_os()));
}
