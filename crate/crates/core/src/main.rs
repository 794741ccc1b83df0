fn main() {
    std::process::exit(dualitylab::cli_report::run(std::env::args_os()));
}
