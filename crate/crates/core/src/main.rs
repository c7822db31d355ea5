fn main() {
    std::process::exit(l2graph::cli::run(std::env::args()));
}
