fn main() {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).init();
    std::process::exit(cavity_shortcut::cli::main_with_args(std::env::args_os()));
}
