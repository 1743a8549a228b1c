fn main() {
    std::process::exit(srpat_cli::run(std::env::args_os()));
}
