fn main() {
    std::process::exit(gestureflow_cli::run(std::env::args_os()));
}
