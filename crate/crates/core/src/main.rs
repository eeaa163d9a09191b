fn main() {
    std::process::exit(exactode::run_cli());
}
