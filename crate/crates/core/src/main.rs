fn main() -> std::process::ExitCode {
    opstat::cli::main()
}
