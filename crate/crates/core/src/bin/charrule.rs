fn main() {
    charrule::cli::main()
}
