fn main() {
    std::process::exit(mclp::cli::run());
}
