#pragma once

#define RALOHA_VERSION_MAJOR 0
#define RALOHA_VERSION_MINOR 1
#define RALOHA_VERSION_PATCH 0
#define RALOHA_VERSION "0.1.0"
