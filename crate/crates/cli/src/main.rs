fn main() {
    std::process::exit(cpdirac_cli::run(std::env::args_os()));
}
