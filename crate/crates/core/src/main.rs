fn main() {
    std::process::exit(pfcsim::cli::main());
}
