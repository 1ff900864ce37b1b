fn main() {
    std::process::exit(zicount::cli::main());
}
