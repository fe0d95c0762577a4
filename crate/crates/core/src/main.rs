fn main() {
    std::process::exit(l1l2::cli::main());
}
