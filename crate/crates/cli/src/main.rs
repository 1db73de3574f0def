fn main() {
    std::process::exit(bhg_cli::run(std::env::args_os()));
}
