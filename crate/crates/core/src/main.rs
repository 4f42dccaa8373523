fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("COCOFUZZ_LOG", "warn")).init();
    std::process::exit(cocofuzz::cli::run(std::env::args_os()));
}
