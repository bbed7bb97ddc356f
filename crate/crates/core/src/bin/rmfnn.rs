fn main() {
    std::process::exit(rmfnn::cli::run(std::env::args_os()));
}
