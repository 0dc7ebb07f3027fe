fn main() {
    std::process::exit(ndelab_cli::run(std::env::args_os()));
}
