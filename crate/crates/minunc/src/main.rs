use minunc::cli;

fn main() {
    let matches = cli::build_command().get_matches();
    let result = cli::config_from_matches(&matches).and_then(|config| cli::run(&config));
    if let Err(err) = result {
        eprintln!("{}", cli::error_json(&err));
        std::process::exit(cli::exit_code(&err));
    }
}
