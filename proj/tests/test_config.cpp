#include <gtest/gtest.h>

#include "rftrojan/config.hpp"

using namespace rft;

TEST(Config, DefaultsAreValid) {
  const ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.schemes.size(), 11u);
  EXPECT_EQ(c.ofdm().frame_len(), 80);
  EXPECT_NO_THROW(ExperimentConfig::full_scale().validate());
  EXPECT_EQ(ExperimentConfig::full_scale().snr_list_db.size(), 14u);
}

TEST(Config, ParsesValuesAndComments) {
  const auto c = parse_config("m_symbols = 330   # small\n\n  rho_percent=10\nschemes = BPSK,QPSK,16QAM\nseed = 7\n");
  EXPECT_EQ(c.m_symbols, 330);
  EXPECT_DOUBLE_EQ(c.rho_percent, 10.0);
  EXPECT_EQ(c.schemes, (std::vector<Scheme>{Scheme::kBpsk, Scheme::kQpsk, Scheme::k16Qam}));
  EXPECT_EQ(c.seed, 7u);
}

TEST(Config, RejectsUnknownDuplicateAndMalformed) {
  EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("seed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("seed\n"), ConfigError);
  EXPECT_THROW(parse_config("lr = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("epochs = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_config("schemes = BPSK,WBFM\n"), ConfigError);
}

TEST(Config, ValidationCatchesBadValues) {
  EXPECT_THROW(parse_config("m_symbols = 0\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("m_symbols = 10\n").validate(), ConfigError);  // fewer than the 33 pairs
  EXPECT_THROW(parse_config("n_subcarriers = 48\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("surrogate_batch = 0\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("y_tar = 11\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("rho_percent = 120\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("delta_frac = 0\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("surrogate_kernel = 2\n").validate(), ConfigError);
  EXPECT_THROW(parse_config("channel_taps = 4\n").validate(), ConfigError);
}

TEST(Config, NumberLists) {
  EXPECT_EQ(parse_number_list("0, 8,18"), (std::vector<double>{0, 8, 18}));
  EXPECT_EQ(parse_number_list("-8:2:0"), (std::vector<double>{-8, -6, -4, -2, 0}));
  EXPECT_THROW(parse_number_list(""), ConfigError);
  EXPECT_THROW(parse_number_list("0:0:5"), ConfigError);
  EXPECT_THROW(parse_number_list("5:1:0"), ConfigError);
}

TEST(Config, TextRoundTrip) {
  auto c = ExperimentConfig::full_scale();
  c.lr = 0.1 + 0.2;  // not exactly representable in short decimal
  c.schemes = {Scheme::k16Apsk, Scheme::kPam8};
  c.seed = 0xffffffffffffffffULL;
  const auto back = parse_config(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.lr, c.lr);
  EXPECT_EQ(back.schemes, c.schemes);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.snr_list_db, c.snr_list_db);
}
