fn main() {
    std::process::exit(mvksc::cli::main());
}
