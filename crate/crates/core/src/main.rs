fn main() -> std::process::ExitCode {
    quatode::cli::main()
}
