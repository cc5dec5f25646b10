fn main() {
    std::process::exit(edgealign_cli::run(std::env::args_os()));
}
