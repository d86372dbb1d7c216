fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DDMKIT_LOG", "warn"))
        .format_timestamp(None)
        .init();
    std::process::exit(ddm_kit::cli::run(std::env::args_os()));
}
