use std::collections::BTreeMap;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TECHLEV_LOG", "warn")).init();
    let env: BTreeMap<String, String> = std::env::vars().collect();
    std::process::exit(techlev_cli::run(std::env::args_os(), &env));
}
