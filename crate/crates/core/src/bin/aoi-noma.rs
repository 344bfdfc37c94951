fn main() {
    std::process::exit(aoi_noma::cli::run_cli(std::env::args_os()));
}
