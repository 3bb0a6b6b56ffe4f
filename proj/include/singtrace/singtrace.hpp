#pragma once

#include "singtrace/classify.hpp"
#include "singtrace/construct.hpp"
#include "singtrace/fn_core.hpp"
#include "singtrace/ideals.hpp"
#include "singtrace/indices.hpp"
#include "singtrace/integral.hpp"
#include "singtrace/io.hpp"
#include "singtrace/report.hpp"
