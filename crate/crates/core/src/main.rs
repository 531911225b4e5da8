fn main() {
    std::process::exit(aip_core::cli::run(std::env::args_os()));
}
