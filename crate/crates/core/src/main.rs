fn main() {
    std::process::exit(mixamc::cli::main());
}
