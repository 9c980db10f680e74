fn main() {
    std::process::exit(crypto_metric::cli::main_with_args(std::env::args_os()));
}
