fn main() {
    std::process::exit(taintminer::cli::run());
}
