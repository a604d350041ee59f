fn main() {
    std::process::exit(whiteboard_cli::dispatch(std::env::args_os()));
}
