#include <stdlib.h>
#include <inttypes.h>

#define KEY_BYTES 32
#define BLOCK_BYTES 16
