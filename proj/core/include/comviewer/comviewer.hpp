#pragma once

#include "comviewer/board.hpp"
#include "comviewer/config.hpp"
#include "comviewer/corpus.hpp"
#include "comviewer/error.hpp"
#include "comviewer/explorer.hpp"
#include "comviewer/labeling.hpp"
#include "comviewer/layout.hpp"
#include "comviewer/llm.hpp"
#include "comviewer/notes.hpp"
#include "comviewer/schema.hpp"
#include "comviewer/search.hpp"
#include "comviewer/server.hpp"
#include "comviewer/session.hpp"
#include "comviewer/similarity.hpp"
#include "comviewer/text.hpp"
#include "comviewer/topics.hpp"
