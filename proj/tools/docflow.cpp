#include <cstdio>

int main() {
    std::puts("docflow: cli not wired yet");
    return 2;
}
