fn main() {
    std::process::exit(quadromech::cli::main());
}
