fn main() {
    std::process::exit(multcancel::cli_main());
}
