#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "docflow/api_registry.hpp"
#include "docflow/errors.hpp"

namespace docflow {

// Natural-language phrasing for API calls, in English and Chinese. The
// generator renders turn instructions from these phrases and the scripted
// planner replays them as sub-instructions, so ground truth text and ground
// truth calls always agree. Wording is chosen so the intent classifier routes
// each phrase to a category that contains its API.

enum class Lang { En, Zh };

inline const char* to_string(Lang l) { return l == Lang::En ? "en" : "zh"; }

// Any CJK code point marks the text as Chinese.
inline Lang detect_lang(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        std::uint32_t cp = c;
        std::size_t len = 1;
        if (c >= 0xF0) len = 4;
        else if (c >= 0xE0) len = 3;
        else if (c >= 0xC0) len = 2;
        if (len > 1 && i + len <= text.size()) {
            cp = c & (0xFF >> (len + 1));
            for (std::size_t k = 1; k < len; ++k)
                cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
        }
        if (cp >= 0x2E80 && cp <= 0x9FFF) return Lang::Zh;
        i += len;
    }
    return Lang::En;
}

namespace detail {

// Compact numeric rendering: integers bare, floats trimmed to three decimals.
inline std::string fmt_num(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15)
        return std::to_string(static_cast<long long>(v));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string s = buf;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

inline std::string arg_num(const json& args, const char* key, double fallback = 0) {
    if (args.contains(key) && args.at(key).is_number())
        return fmt_num(args.at(key).get<double>());
    return fmt_num(fallback);
}

inline std::string arg_str(const json& args, const char* key, const char* fallback = "") {
    if (args.contains(key) && args.at(key).is_string())
        return args.at(key).get<std::string>();
    return fallback;
}

inline std::string arg_list(const json& args, const char* key, const char* sep) {
    std::string out;
    if (!args.contains(key) || !args.at(key).is_array()) return out;
    for (const json& v : args.at(key)) {
        if (!out.empty()) out += sep;
        out += v.is_string() ? v.get<std::string>() : v.dump();
    }
    return out;
}

} // namespace detail

// One atomic phrase per call. Throws Error for unknown API names.
inline std::string sub_instruction_for(const ApiCall& call, Lang lang) {
    using detail::arg_list;
    using detail::arg_num;
    using detail::arg_str;
    const json& a = call.args;
    const std::string& n = call.api_name;
    const bool en = lang == Lang::En;

    if (n == "add_paragraph")
        return en ? "Write a new paragraph saying \"" + arg_str(a, "text") + "\""
                  : "写一段内容为\"" + arg_str(a, "text") + "\"的新段落";
    if (n == "insert_paragraph_at")
        return en ? "Insert a paragraph at position " + arg_num(a, "index") + " saying \"" +
                        arg_str(a, "text") + "\""
                  : "在位置" + arg_num(a, "index") + "添加一段：\"" + arg_str(a, "text") + "\"";
    if (n == "add_heading")
        return en ? "Write a heading titled \"" + arg_str(a, "text") + "\""
                  : "写一个标题：\"" + arg_str(a, "text") + "\"";
    if (n == "append_text")
        return en ? "Append \"" + arg_str(a, "text") + "\" to paragraph " +
                        arg_num(a, "paragraph_index")
                  : "在第" + arg_num(a, "paragraph_index") + "段末尾添加文字\"" +
                        arg_str(a, "text") + "\"";
    if (n == "delete_paragraph")
        return en ? "Delete the paragraph at position " + arg_num(a, "index")
                  : "删除第" + arg_num(a, "index") + "段";
    if (n == "edit_paragraph_text")
        return en ? "Edit paragraph " + arg_num(a, "index") + " to read \"" +
                        arg_str(a, "text") + "\""
                  : "修改第" + arg_num(a, "index") + "段为\"" + arg_str(a, "text") + "\"";
    if (n == "replace_text")
        return en ? "Replace \"" + arg_str(a, "find") + "\" with \"" + arg_str(a, "replace") +
                        "\""
                  : "把\"" + arg_str(a, "find") + "\"替换为\"" + arg_str(a, "replace") + "\"";
    if (n == "add_table")
        return en ? "Insert a table with " + arg_num(a, "rows") + " rows and " +
                        arg_num(a, "cols") + " columns"
                  : "添加一个" + arg_num(a, "rows") + "行" + arg_num(a, "cols") + "列的表格";
    if (n == "delete_table")
        return en ? "Delete table " + arg_num(a, "table_index")
                  : "删除第" + arg_num(a, "table_index") + "个表格";
    if (n == "add_table_header")
        return en ? "Add headers " + arg_list(a, "headers", ", ") + " to table " +
                        arg_num(a, "table_index")
                  : "给表格" + arg_num(a, "table_index") + "添加表头：" +
                        arg_list(a, "headers", "、");
    if (n == "set_cell_text")
        return en ? "Set the text of cell (" + arg_num(a, "row") + ", " + arg_num(a, "col") +
                        ") in table " + arg_num(a, "table_index") + " to \"" +
                        arg_str(a, "text") + "\""
                  : "把表格" + arg_num(a, "table_index") + "第" + arg_num(a, "row") + "行第" +
                        arg_num(a, "col") + "列的单元格内容设为\"" + arg_str(a, "text") + "\"";
    if (n == "merge_cell_table")
        return en ? "Merge cells in row " + arg_num(a, "row") + " of table " +
                        arg_num(a, "table_index")
                  : "合并表格" + arg_num(a, "table_index") + "第" + arg_num(a, "row") +
                        "行的单元格";
    if (n == "split_cell_table")
        return en ? "Split the merged cell at row " + arg_num(a, "row") + ", column " +
                        arg_num(a, "col") + " of table " + arg_num(a, "table_index")
                  : "拆分表格" + arg_num(a, "table_index") + "第" + arg_num(a, "row") + "行第" +
                        arg_num(a, "col") + "列的单元格";
    if (n == "set_table_style")
        return en ? "Apply table style \"" + arg_str(a, "style") + "\" to table " +
                        arg_num(a, "table_index")
                  : "将表格" + arg_num(a, "table_index") + "的样式设为\"" + arg_str(a, "style") +
                        "\"";
    if (n == "set_row_height")
        return en ? "Set the height of row " + arg_num(a, "row") + " in table " +
                        arg_num(a, "table_index") + " to " + arg_num(a, "height_pt") + "pt"
                  : "把表格" + arg_num(a, "table_index") + "第" + arg_num(a, "row") +
                        "行的行高设为" + arg_num(a, "height_pt") + "磅";
    if (n == "set_col_width")
        return en ? "Set the width of column " + arg_num(a, "col") + " in table " +
                        arg_num(a, "table_index") + " to " + arg_num(a, "width_pt") + "pt"
                  : "把表格" + arg_num(a, "table_index") + "第" + arg_num(a, "col") +
                        "列的列宽设为" + arg_num(a, "width_pt") + "磅";
    if (n == "add_table_row")
        return en ? "Add a row to table " + arg_num(a, "table_index")
                  : "给表格" + arg_num(a, "table_index") + "添加一行";
    if (n == "delete_table_row")
        return en ? "Delete row " + arg_num(a, "row") + " from table " +
                        arg_num(a, "table_index")
                  : "删除表格" + arg_num(a, "table_index") + "的第" + arg_num(a, "row") + "行";
    if (n == "insert_image")
        return en ? "Insert an image into paragraph " + arg_num(a, "paragraph_index")
                  : "在第" + arg_num(a, "paragraph_index") + "段插入图片";
    if (n == "resize_image")
        return en ? "Resize image " + arg_num(a, "image_index") + " to " +
                        arg_num(a, "width_pt") + "x" + arg_num(a, "height_pt") + "pt"
                  : "把图片" + arg_num(a, "image_index") + "调整为" + arg_num(a, "width_pt") +
                        "x" + arg_num(a, "height_pt") + "磅";
    if (n == "delete_image")
        return en ? "Delete image " + arg_num(a, "image_index")
                  : "删除图片" + arg_num(a, "image_index");
    if (n == "move_image")
        return en ? "Move image " + arg_num(a, "image_index") + " to paragraph " +
                        arg_num(a, "paragraph_index")
                  : "把图片" + arg_num(a, "image_index") + "移动到第" +
                        arg_num(a, "paragraph_index") + "段";
    if (n == "add_chart_stub")
        return en ? "Add a " + arg_str(a, "chart_type", "bar") + " chart with " +
                        arg_num(a, "series_count", 1) + " series"
                  : "添加一个" + arg_str(a, "chart_type", "bar") + "图表，共" +
                        arg_num(a, "series_count", 1) + "个系列";
    if (n == "update_chart_stub")
        return en ? "Update chart " + arg_num(a, "chart_index")
                  : "更新图表" + arg_num(a, "chart_index");
    if (n == "delete_chart_stub")
        return en ? "Delete chart " + arg_num(a, "chart_index")
                  : "删除图表" + arg_num(a, "chart_index");
    if (n == "set_chart_title")
        return en ? "Set the title of chart " + arg_num(a, "chart_index") + " to \"" +
                        arg_str(a, "title") + "\""
                  : "把图表" + arg_num(a, "chart_index") + "的标题设为\"" + arg_str(a, "title") +
                        "\"";
    if (n == "set_bold") {
        const bool on = !a.contains("bold") || a.at("bold").get<bool>();
        if (en)
            return on ? "Make paragraph " + arg_num(a, "paragraph_index") + " bold"
                      : "Clear the bold weight on paragraph " + arg_num(a, "paragraph_index");
        return on ? "把第" + arg_num(a, "paragraph_index") + "段加粗"
                  : "取消第" + arg_num(a, "paragraph_index") + "段的加粗";
    }
    if (n == "set_italic") {
        const bool on = !a.contains("italic") || a.at("italic").get<bool>();
        if (en)
            return on ? "Make paragraph " + arg_num(a, "paragraph_index") + " italic"
                      : "Clear the italics on paragraph " + arg_num(a, "paragraph_index");
        return on ? "把第" + arg_num(a, "paragraph_index") + "段设为斜体"
                  : "取消第" + arg_num(a, "paragraph_index") + "段的斜体";
    }
    if (n == "set_underline") {
        const bool on = !a.contains("underline") || a.at("underline").get<bool>();
        if (en)
            return on ? "Underline paragraph " + arg_num(a, "paragraph_index")
                      : "Clear the underline on paragraph " + arg_num(a, "paragraph_index");
        return on ? "给第" + arg_num(a, "paragraph_index") + "段加下划线"
                  : "取消第" + arg_num(a, "paragraph_index") + "段的下划线";
    }
    if (n == "set_font")
        return en ? "Set the font of paragraph " + arg_num(a, "paragraph_index") + " to " +
                        arg_str(a, "font_name")
                  : "把第" + arg_num(a, "paragraph_index") + "段的字体设为" +
                        arg_str(a, "font_name");
    if (n == "set_font_size")
        return en ? "Set the font size of paragraph " + arg_num(a, "paragraph_index") + " to " +
                        arg_num(a, "size_pt") + "pt"
                  : "把第" + arg_num(a, "paragraph_index") + "段的字体大小设为" +
                        arg_num(a, "size_pt") + "磅";
    if (n == "set_font_color")
        return en ? "Color paragraph " + arg_num(a, "paragraph_index") + " in #" +
                        arg_str(a, "color_rgb")
                  : "把第" + arg_num(a, "paragraph_index") + "段的颜色设为#" +
                        arg_str(a, "color_rgb");
    if (n == "set_alignment") {
        const std::string al = arg_str(a, "alignment", "left");
        const std::string idx = arg_num(a, "paragraph_index");
        if (en) {
            if (al == "center") return "Center paragraph " + idx;
            return "Align paragraph " + idx + " to the " + al;
        }
        if (al == "center") return "把第" + idx + "段居中";
        if (al == "right") return "把第" + idx + "段设为右对齐";
        if (al == "justify") return "把第" + idx + "段设为两端对齐";
        return "把第" + idx + "段设为左对齐";
    }
    if (n == "set_paragraph_style")
        return en ? "Apply the style \"" + arg_str(a, "style") + "\" to paragraph " +
                        arg_num(a, "paragraph_index")
                  : "把第" + arg_num(a, "paragraph_index") + "段的样式设为\"" +
                        arg_str(a, "style") + "\"";
    if (n == "set_spacing")
        return en ? "Set the line spacing of paragraph " + arg_num(a, "paragraph_index") +
                        " to " + arg_num(a, "line", 1.0)
                  : "把第" + arg_num(a, "paragraph_index") + "段的行距设为" +
                        arg_num(a, "line", 1.0);
    if (n == "set_indentation")
        return en ? "Indent paragraph " + arg_num(a, "paragraph_index") + " by " +
                        arg_num(a, "left_pt") + "pt"
                  : "设置第" + arg_num(a, "paragraph_index") + "段的缩进为" +
                        arg_num(a, "left_pt") + "磅";
    if (n == "define_style")
        return en ? "Define a style named \"" + arg_str(a, "style_name") + "\""
                  : "定义一个名为\"" + arg_str(a, "style_name") + "\"的样式";
    if (n == "add_header")
        return en ? "Add a page header reading \"" + arg_str(a, "text") + "\""
                  : "添加页眉：\"" + arg_str(a, "text") + "\"";
    if (n == "add_footer")
        return en ? "Add a page footer reading \"" + arg_str(a, "text") + "\""
                  : "添加页脚：\"" + arg_str(a, "text") + "\"";
    if (n == "add_page_number")
        return en ? "Add page numbers" : "添加页码";
    if (n == "add_watermark")
        return en ? "Add a watermark reading \"" + arg_str(a, "text") + "\""
                  : "添加水印：\"" + arg_str(a, "text") + "\"";
    if (n == "add_toc")
        return en ? "Insert a table of contents" : "插入目录";
    if (n == "add_hyperlink")
        return en ? "Add a hyperlink to " + arg_str(a, "url") + " in paragraph " +
                        arg_num(a, "paragraph_index")
                  : "在第" + arg_num(a, "paragraph_index") + "段添加指向" + arg_str(a, "url") +
                        "的超链接";
    if (n == "add_bookmark")
        return en ? "Add a bookmark named \"" + arg_str(a, "name") + "\" at paragraph " +
                        arg_num(a, "paragraph_index")
                  : "在第" + arg_num(a, "paragraph_index") + "段添加书签\"" +
                        arg_str(a, "name") + "\"";
    if (n == "insert_page_break")
        return en ? "Insert a page break after paragraph " + arg_num(a, "paragraph_index")
                  : "在第" + arg_num(a, "paragraph_index") + "段后插入分页符";
    if (n == "insert_line_break")
        return en ? "Insert a line break in paragraph " + arg_num(a, "paragraph_index")
                  : "在第" + arg_num(a, "paragraph_index") + "段插入换行符";
    if (n == "save_document") return en ? "Save the document" : "保存文档";
    if (n == "export_state") return en ? "Export the document state" : "导出文档状态";
    if (n == "import_state") return en ? "Import a document state" : "导入文档状态";
    if (n == "reset_document") return en ? "Reset the document" : "重置文档";

    throw Error("no phrasing for api: " + n);
}

// A whole user turn: the calls' phrases chained with the language's connector.
inline std::string instruction_for(const std::vector<ApiCall>& calls, Lang lang) {
    const char* sep = lang == Lang::Zh ? "；然后" : "; then ";
    std::string out;
    for (std::size_t i = 0; i < calls.size(); ++i) {
        if (i > 0) out += sep;
        out += sub_instruction_for(calls[i], lang);
    }
    return out;
}

} // namespace docflow
