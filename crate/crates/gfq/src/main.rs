fn main() {
    std::process::exit(gfq::cli::run(std::env::args_os()));
}
