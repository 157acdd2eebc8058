fn main() {
    std::process::exit(wulff_mc::cli::run_cli(std::env::args_os()));
}
