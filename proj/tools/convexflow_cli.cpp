// CLI front end; filled in with subcommands after the library modules.
int main() { return 0; }
