fn main() {
    std::process::exit(lambda_decouple::cli::run(std::env::args_os()));
}
