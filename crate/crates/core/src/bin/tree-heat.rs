fn main() {
    std::process::exit(tree_heat::cli::run_from(std::env::args_os()));
}
