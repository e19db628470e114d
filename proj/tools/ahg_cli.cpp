// Placeholder main; the batch runner is wired up once the suites exist.
int main() { return 0; }
