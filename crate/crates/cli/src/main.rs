fn main() {
    std::process::exit(ngramdep_cli::run(std::env::args_os()));
}
