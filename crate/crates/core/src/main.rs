fn main() -> std::process::ExitCode {
    mw2v::cli::main()
}
