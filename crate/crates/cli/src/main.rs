fn main() {
    std::process::exit(revkit_cli::run(std::env::args_os()));
}
