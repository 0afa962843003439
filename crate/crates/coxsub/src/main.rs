fn main() {
    std::process::exit(coxsub::cli::run(std::env::args_os()));
}
