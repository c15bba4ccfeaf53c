fn main() {
    std::process::exit(sm_pricer_cli::run(std::env::args_os()));
}
