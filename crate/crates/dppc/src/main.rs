fn main() {
    std::process::exit(dppc::cli::run());
}
