#pragma once

#include "affect/analysis/correlation.hpp"
#include "affect/analysis/gaze.hpp"
#include "affect/analysis/report.hpp"
#include "affect/classify/calibrate.hpp"
#include "affect/classify/cv.hpp"
#include "affect/classify/folds.hpp"
#include "affect/classify/incremental.hpp"
#include "affect/classify/model.hpp"
#include "affect/classify/svm.hpp"
#include "affect/core/epoch.hpp"
#include "affect/core/pupil.hpp"
#include "affect/core/session_io.hpp"
#include "affect/core/types.hpp"
#include "affect/core/validate.hpp"
#include "affect/error.hpp"
#include "affect/features/eeg.hpp"
#include "affect/features/extract.hpp"
#include "affect/features/eye.hpp"
#include "affect/pipeline/config.hpp"
#include "affect/pipeline/run.hpp"
#include "affect/preprocess/despike.hpp"
#include "affect/preprocess/filter.hpp"
#include "affect/preprocess/ica.hpp"
#include "affect/preprocess/plr.hpp"
#include "affect/rng.hpp"
#include "affect/select/ilfs.hpp"
#include "affect/synth/generator.hpp"
