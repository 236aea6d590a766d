fn main() {
    std::process::exit(tomoml_cli::run(std::env::args_os()));
}
