fn main() {
    std::process::exit(cppdip_cli::run(std::env::args_os()));
}
