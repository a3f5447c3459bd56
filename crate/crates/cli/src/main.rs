fn main() {
    std::process::exit(kantian_cli::run());
}
