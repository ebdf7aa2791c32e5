fn main() {
    std::process::exit(ncpt_cli::run(std::env::args_os()));
}
