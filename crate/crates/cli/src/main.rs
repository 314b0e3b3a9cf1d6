fn main() {
    std::process::exit(aew_cli::run(std::env::args_os()));
}
