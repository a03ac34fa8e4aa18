fn main() {
    std::process::exit(cdsupport_cli::dispatch(std::env::args_os()));
}
