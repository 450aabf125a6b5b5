fn main() {
    std::process::exit(lefrac::io::run_cli(std::env::args_os()));
}
