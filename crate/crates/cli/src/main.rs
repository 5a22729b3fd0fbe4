fn main() {
    std::process::exit(marweight_cli::run(std::env::args_os()));
}
