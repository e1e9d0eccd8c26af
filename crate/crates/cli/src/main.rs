fn main() {
    tgrw_cli::exec::main_entry()
}
