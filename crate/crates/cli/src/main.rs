fn main() {
    env_logger::init();
    std::process::exit(mcf_cli::run(std::env::args_os()));
}
