fn main() {
    std::process::exit(secrecy_cli::run(std::env::args_os()));
}
