fn main() {
    let code = semscan::cli::cli_main(std::env::args_os());
    std::process::exit(code);
}
