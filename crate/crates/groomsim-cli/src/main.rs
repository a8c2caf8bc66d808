fn main() {
    std::process::exit(groomsim_cli::dispatch(std::env::args_os()));
}
