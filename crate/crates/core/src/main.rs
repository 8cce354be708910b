fn main() {
    std::process::exit(sant::cli::main());
}
