#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tablenet/record.hpp"
#include "tablenet/rng.hpp"

namespace tablenet {

enum class ValueKind {
  organization,
  region,
  plan,
  service,
  technology,
  status,
  money,
  gigabytes,
  mbps,
  percent,
  count,
  latency,
  year,
  quarter
};

inline bool is_numeric_kind(ValueKind k) {
  switch (k) {
    case ValueKind::money:
    case ValueKind::gigabytes:
    case ValueKind::mbps:
    case ValueKind::percent:
    case ValueKind::count:
    case ValueKind::latency:
    case ValueKind::year:
      return true;
    default:
      return false;
  }
}

struct ColumnSpec {
  std::string name;
  ValueKind kind;
};

// Vocabulary backing the deterministic template provider for one domain and
// language. Topic patterns use the slots {kw}, {org} and {year}.
struct Lexicon {
  std::vector<std::string> keywords;
  std::vector<std::string> organizations;
  std::vector<std::string> regions;
  std::vector<std::string> technologies;
  std::vector<std::string> statuses;
  std::vector<std::string> plan_suffixes;
  std::vector<std::string> topic_patterns;
  std::vector<std::string> groups;
  std::vector<ColumnSpec> columns;
  std::string quarter_pattern;  // {q} and {year}
};

namespace detail {

inline Lexicon telecom_en() {
  Lexicon l;
  l.keywords = {"5G",
                "optical fiber",
                "telecommunications",
                "operator",
                "base station",
                "backbone network",
                "gigabit",
                "data center",
                "FTTR",
                "quality of service",
                "roaming",
                "value-added services",
                "service hall",
                "network access",
                "voice services",
                "broadband",
                "cloud computing",
                "local area network",
                "Internet of Things",
                "gateway services",
                "ring back tone",
                "network security",
                "Wi-Fi",
                "core network",
                "network coverage",
                "access network",
                "network optimization",
                "customer relationship management",
                "IPTV",
                "5G plans",
                "data pricing",
                "VoLTE",
                "plan pricing"};
  l.organizations = {"China Unicom", "China Telecom", "China Mobile", "China Broadnet"};
  l.regions = {"Beijing", "Shanghai", "Guangdong", "Jiangsu", "Zhejiang", "Sichuan",
               "Hubei",   "Shandong", "Fujian",   "Henan",   "Hunan",    "Shaanxi"};
  l.technologies = {"5G SA", "5G NSA", "LTE", "FTTH", "FTTR", "Wi-Fi 6", "Wi-Fi 7", "GPON",
                    "XGS-PON", "VoLTE"};
  l.statuses = {"Active", "Planned", "Deployed", "Testing", "Upgrading", "N/A"};
  l.plan_suffixes = {"Basic", "Plus", "Pro", "Family", "Business", "Youth", "Unlimited"};
  l.topic_patterns = {"{org} {kw} pricing overview {year}",
                      "{kw} deployment statistics by region {year}",
                      "{org} {kw} quarterly performance {year}",
                      "{kw} service comparison among operators {year}",
                      "{org} {kw} subscriber growth {year}",
                      "{kw} coverage and quality indicators {year}",
                      "{org} {kw} tariff structure {year}",
                      "{kw} investment and capacity plan {year}"};
  l.groups = {"Pricing", "Network Metrics", "Service Details", "Coverage", "Performance",
              "Subscriber Data", "Capacity", "Quality Indicators"};
  l.columns = {{"Operator", ValueKind::organization},
               {"Region", ValueKind::region},
               {"Plan Name", ValueKind::plan},
               {"Service Type", ValueKind::service},
               {"Technology", ValueKind::technology},
               {"Status", ValueKind::status},
               {"Monthly Fee (CNY)", ValueKind::money},
               {"Data Allowance (GB)", ValueKind::gigabytes},
               {"Download Speed (Mbps)", ValueKind::mbps},
               {"Coverage Rate (%)", ValueKind::percent},
               {"Subscribers (10k)", ValueKind::count},
               {"Base Stations", ValueKind::count},
               {"Latency (ms)", ValueKind::latency},
               {"Launch Year", ValueKind::year},
               {"Reporting Period", ValueKind::quarter}};
  l.quarter_pattern = "Q{q} {year}";
  return l;
}

inline Lexicon telecom_zh() {
  Lexicon l;
  l.keywords = {"5G",       "光纤",     "电信",       "运营商",   "基站",     "骨干网",
                "千兆",     "数据中心", "FTTR",       "服务质量", "漫游",     "增值业务",
                "营业厅",   "网络接入", "语音业务",   "宽带",     "云计算",   "局域网",
                "物联网",   "网关服务", "彩铃",       "网络安全", "Wi-Fi",    "核心网",
                "网络覆盖", "接入网",   "网络优化",   "客户关系管理", "IPTV", "5G套餐",
                "流量资费", "VoLTE",    "套餐资费"};
  l.organizations = {"中国联通", "中国电信", "中国移动", "中国广电"};
  l.regions = {"北京", "上海", "广东", "江苏", "浙江", "四川",
               "湖北", "山东", "福建", "河南", "湖南", "陕西"};
  l.technologies = {"5G SA", "5G NSA", "LTE", "FTTH", "FTTR", "Wi-Fi 6", "Wi-Fi 7", "GPON",
                    "XGS-PON", "VoLTE"};
  l.statuses = {"已商用", "规划中", "已部署", "测试中", "升级中", "-"};
  l.plan_suffixes = {"基础版", "畅享版", "尊享版", "家庭版", "商务版", "青春版", "不限量版"};
  l.topic_patterns = {"{org}{kw}资费概览（{year}年）",  "{year}年{kw}分地区部署统计",
                      "{org}{kw}季度运营情况（{year}年）", "{year}年各运营商{kw}业务对比",
                      "{org}{kw}用户增长情况（{year}年）", "{year}年{kw}覆盖与质量指标",
                      "{org}{kw}资费结构（{year}年）",     "{year}年{kw}投资与容量规划"};
  l.groups = {"资费信息", "网络指标", "业务详情", "覆盖情况", "性能指标", "用户数据", "容量", "质量指标"};
  l.columns = {{"运营商", ValueKind::organization},
               {"地区", ValueKind::region},
               {"套餐名称", ValueKind::plan},
               {"业务类型", ValueKind::service},
               {"技术制式", ValueKind::technology},
               {"状态", ValueKind::status},
               {"月费（元）", ValueKind::money},
               {"流量（GB）", ValueKind::gigabytes},
               {"下行速率（Mbps）", ValueKind::mbps},
               {"覆盖率（%）", ValueKind::percent},
               {"用户数（万户）", ValueKind::count},
               {"基站数量", ValueKind::count},
               {"时延（ms）", ValueKind::latency},
               {"上线年份", ValueKind::year},
               {"统计周期", ValueKind::quarter}};
  l.quarter_pattern = "{year}年第{q}季度";
  return l;
}

inline Lexicon generic_en(std::string_view domain) {
  Lexicon l;
  const std::string d(domain);
  l.keywords = {d + " products", d + " services", d + " projects", d + " operations",
                d + " market", d + " customers", d + " suppliers", d + " budget"};
  l.organizations = {"North Division", "South Division", "East Division", "West Division"};
  l.regions = {"North", "South", "East", "West", "Central", "Northeast", "Southwest"};
  l.technologies = {"Standard", "Advanced", "Premium", "Legacy", "Pilot"};
  l.statuses = {"Active", "Planned", "Completed", "On Hold", "TBD"};
  l.plan_suffixes = {"A", "B", "C", "Lite", "Plus"};
  l.topic_patterns = {"{kw} summary {year}", "{org} {kw} review {year}",
                      "{kw} breakdown by region {year}", "{kw} performance indicators {year}"};
  l.groups = {"Overview", "Financials", "Metrics", "Details", "Outcomes"};
  l.columns = {{"Unit", ValueKind::organization},   {"Region", ValueKind::region},
               {"Item", ValueKind::plan},           {"Category", ValueKind::service},
               {"Tier", ValueKind::technology},     {"Status", ValueKind::status},
               {"Cost (USD)", ValueKind::money},    {"Share (%)", ValueKind::percent},
               {"Quantity", ValueKind::count},      {"Year", ValueKind::year},
               {"Period", ValueKind::quarter}};
  l.quarter_pattern = "Q{q} {year}";
  return l;
}

inline Lexicon generic_zh(std::string_view domain) {
  Lexicon l;
  const std::string d(domain);
  l.keywords = {d + "产品", d + "服务", d + "项目", d + "运营", d + "市场", d + "客户"};
  l.organizations = {"华北分部", "华南分部", "华东分部", "西部分部"};
  l.regions = {"华北", "华南", "华东", "华中", "西南", "西北", "东北"};
  l.technologies = {"标准型", "进阶型", "旗舰型", "试点型"};
  l.statuses = {"进行中", "已完成", "规划中", "暂停", "待定"};
  l.plan_suffixes = {"甲类", "乙类", "丙类", "精简版", "增强版"};
  l.topic_patterns = {"{year}年{kw}汇总", "{org}{kw}年度回顾（{year}年）",
                      "{year}年{kw}分地区明细", "{year}年{kw}绩效指标"};
  l.groups = {"概况", "财务", "指标", "明细", "成果"};
  l.columns = {{"单位", ValueKind::organization}, {"地区", ValueKind::region},
               {"项目", ValueKind::plan},         {"类别", ValueKind::service},
               {"等级", ValueKind::technology},   {"状态", ValueKind::status},
               {"费用（元）", ValueKind::money},  {"占比（%）", ValueKind::percent},
               {"数量", ValueKind::count},        {"年份", ValueKind::year},
               {"周期", ValueKind::quarter}};
  l.quarter_pattern = "{year}年第{q}季度";
  return l;
}

inline std::string lowercase(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline void replace_all(std::string& text, std::string_view from, std::string_view to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos;
       pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

}  // namespace detail

inline bool is_known_domain(std::string_view domain) {
  const std::string d = detail::lowercase(domain);
  return d == "telecommunication" || d == "telecommunications" || d == "telecom" || d == "电信" ||
         d == "通信";
}

inline const Lexicon& lexicon_for(std::string_view domain, Language lang) {
  if (is_known_domain(domain)) {
    static const Lexicon en = detail::telecom_en();
    static const Lexicon zh = detail::telecom_zh();
    return lang == Language::zh ? zh : en;
  }
  // Generic lexicons are domain-parameterised; cache one per (domain, lang).
  thread_local std::map<std::string, Lexicon> cache;
  const std::string key = std::string(to_string(lang)) + ":" + std::string(domain);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, lang == Language::zh ? detail::generic_zh(domain)
                                                 : detail::generic_en(domain)).first;
  }
  return it->second;
}

inline std::string make_value(ValueKind kind, const Lexicon& lex, Rng& rng,
                              std::string_view keyword) {
  auto fixed = [](double v, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return std::string(buf);
  };
  switch (kind) {
    case ValueKind::organization: return rng.pick(lex.organizations);
    case ValueKind::region: return rng.pick(lex.regions);
    case ValueKind::plan: return std::string(keyword) + " " + rng.pick(lex.plan_suffixes);
    case ValueKind::service: return rng.pick(lex.keywords);
    case ValueKind::technology: return rng.pick(lex.technologies);
    case ValueKind::status: return rng.pick(lex.statuses);
    case ValueKind::money: return std::to_string(rng.uniform(1, 60) * 10 - 1);
    case ValueKind::gigabytes: return std::to_string(rng.uniform(1, 60) * 5);
    case ValueKind::mbps: return std::to_string(rng.uniform(1, 20) * 100);
    case ValueKind::percent: return fixed(60.0 + rng.uniform(0, 399) / 10.0, 1);
    case ValueKind::count: return std::to_string(rng.uniform(10, 99999));
    case ValueKind::latency: return std::to_string(rng.uniform(1, 80));
    case ValueKind::year: return std::to_string(rng.uniform(2015, 2025));
    case ValueKind::quarter: {
      std::string q = lex.quarter_pattern;
      detail::replace_all(q, "{q}", std::to_string(rng.uniform(1, 4)));
      detail::replace_all(q, "{year}", std::to_string(rng.uniform(2019, 2025)));
      return q;
    }
  }
  return {};
}

}  // namespace tablenet
