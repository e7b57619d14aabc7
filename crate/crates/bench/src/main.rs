fn main() {
    std::process::exit(qkmm_bench::run_cli(std::env::args_os()));
}
