#include <cstdio>

int main()
{
    std::puts("emba cli: not wired up yet");
    return 1;
}
