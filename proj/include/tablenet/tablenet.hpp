#pragma once

#include "tablenet/al.hpp"
#include "tablenet/augment.hpp"
#include "tablenet/checker.hpp"
#include "tablenet/correlation.hpp"
#include "tablenet/disturbance.hpp"
#include "tablenet/error.hpp"
#include "tablenet/generator.hpp"
#include "tablenet/html.hpp"
#include "tablenet/http_provider.hpp"
#include "tablenet/infill.hpp"
#include "tablenet/manifest.hpp"
#include "tablenet/record.hpp"
#include "tablenet/table.hpp"
#include "tablenet/teds.hpp"
