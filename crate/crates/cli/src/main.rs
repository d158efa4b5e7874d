fn main() {
    std::process::exit(thr_cli::run());
}
