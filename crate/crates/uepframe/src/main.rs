fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let code = uepframe::cli::run(std::env::args().skip(1));
    std::process::exit(code);
}
