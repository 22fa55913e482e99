fn main() {
    std::process::exit(fermat_chabauty_cli::run(std::env::args()));
}
