// Minimal dependency-free renderer for the chronoseries-plot v1 data island.
// Draws value lines over min/max bands, data_loss as a red area and other
// indexes as 0-1 curves scaled to the plot height. Drag to zoom, double-click
// to reset, hover for a readout in the island time zone.
(function () {
  "use strict";
  var VERSION = "chronoseries-plot v1";
  var PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
  var LOSS = "#d62728";
  var ANOMALY = "#c80078";
  var OTHER = "#7f7f7f";
  var M = { left: 70, right: 20, top: 20, bottom: 40 };

  function banner(container, text) {
    var div = document.createElement("div");
    div.className = "chronoseries-error";
    div.style.cssText = "padding:12px;background:#fde2e2;color:#8a1f1f;font:14px sans-serif";
    div.textContent = text;
    container.appendChild(div);
  }

  function formatter(tz) {
    var opts = { timeZone: tz, year: "numeric", month: "2-digit", day: "2-digit",
                 hour: "2-digit", minute: "2-digit", second: "2-digit", hourCycle: "h23" };
    var f;
    try { f = new Intl.DateTimeFormat("en-CA", opts); } catch (e) { opts.timeZone = "UTC"; f = new Intl.DateTimeFormat("en-CA", opts); }
    return function (ms) {
      var p = {};
      f.formatToParts(new Date(ms)).forEach(function (x) { p[x.type] = x.value; });
      return p.year + "-" + p.month + "-" + p.day + " " + p.hour + ":" + p.minute + ":" + p.second;
    };
  }

  function mount(island, container) {
    container.textContent = "";
    if (!island || island.version !== VERSION) {
      banner(container, "Unsupported plot data version: " + (island && island.version) + " (expected " + VERSION + ")");
      return null;
    }
    var ts = island.timestamps, n = ts.length, labels = island.labels || [];
    var fmt = formatter(island.tz || "UTC");
    var canvas = document.createElement("canvas");
    var width = container.clientWidth || 1000, height = container.clientHeight || 480;
    canvas.width = width; canvas.height = height;
    canvas.style.display = "block";
    container.appendChild(canvas);
    var readout = document.createElement("div");
    readout.className = "chronoseries-readout";
    readout.style.cssText = "font:12px monospace;padding:4px 8px;min-height:16px;white-space:pre";
    container.appendChild(readout);
    var ctx = canvas.getContext("2d");
    var view = { from: 0, to: n - 1 };
    var drag = null;

    function extent() {
      var lo = Infinity, hi = -Infinity;
      labels.forEach(function (label) {
        var v = island.values[label], b = island.bands && island.bands[label];
        for (var i = view.from; i <= view.to; i++) {
          lo = Math.min(lo, b ? b.min[i] : v[i]); hi = Math.max(hi, b ? b.max[i] : v[i]);
        }
      });
      if (!(hi > lo)) { lo -= 1; hi += 1; }
      var pad = (hi - lo) * 0.05;
      return [lo - pad, hi + pad];
    }

    function draw() {
      var y = extent(), t0 = ts[view.from], t1 = Math.max(ts[view.to], t0 + 1);
      var pw = width - M.left - M.right, ph = height - M.top - M.bottom;
      var px = function (t) { return M.left + (t - t0) / (t1 - t0) * pw; };
      var py = function (v) { return M.top + (y[1] - v) / (y[1] - y[0]) * ph; };
      var pi = function (v) { return M.top + (1 - v) * ph; };
      ctx.clearRect(0, 0, width, height);
      ctx.font = "11px sans-serif";
      ctx.fillStyle = "#444";
      for (var k = 0; k <= 5; k++) {
        var v = y[0] + (y[1] - y[0]) * k / 5, yy = py(v);
        ctx.strokeStyle = "#e1e1e1"; ctx.beginPath(); ctx.moveTo(M.left, yy); ctx.lineTo(M.left + pw, yy); ctx.stroke();
        ctx.textAlign = "right"; ctx.fillText(v.toPrecision(4), M.left - 6, yy + 4);
      }
      for (var j = 0; j <= 6; j++) {
        var t = t0 + (t1 - t0) * j / 6, xx = px(t);
        ctx.strokeStyle = "#e1e1e1"; ctx.beginPath(); ctx.moveTo(xx, M.top); ctx.lineTo(xx, M.top + ph); ctx.stroke();
        ctx.textAlign = "center"; ctx.fillText(fmt(t).slice(0, 16), xx, M.top + ph + 16);
      }
      Object.keys(island.indexes || {}).forEach(function (name) {
        var vals = island.indexes[name], loss = name === "data_loss";
        ctx.strokeStyle = ctx.fillStyle = loss ? LOSS : name === "anomaly" ? ANOMALY : OTHER;
        ctx.globalAlpha = loss ? 0.3 : 1;
        ctx.beginPath();
        var open = false, start = 0;
        for (var i = view.from; i <= view.to + 1; i++) {
          var present = i <= view.to && vals[i] !== null;
          if (present && !open) { ctx.moveTo(px(ts[i]), loss ? M.top + ph : pi(vals[i])); open = true; start = i; }
          if (present) ctx.lineTo(px(ts[i]), pi(vals[i]));
          if (!present && open) {
            if (loss) { ctx.lineTo(px(ts[i - 1]), M.top + ph); ctx.lineTo(px(ts[start]), M.top + ph); }
            open = false;
          }
        }
        if (loss) ctx.fill(); else ctx.stroke();
        ctx.globalAlpha = 1;
      });
      labels.forEach(function (label, k) {
        var color = PALETTE[k % PALETTE.length], v = island.values[label], b = island.bands && island.bands[label];
        if (b) {
          ctx.fillStyle = color; ctx.globalAlpha = 0.25; ctx.beginPath();
          for (var i = view.from; i <= view.to; i++) ctx.lineTo(px(ts[i]), py(b.max[i]));
          for (var r = view.to; r >= view.from; r--) ctx.lineTo(px(ts[r]), py(b.min[r]));
          ctx.closePath(); ctx.fill(); ctx.globalAlpha = 1;
        }
        ctx.strokeStyle = color; ctx.lineWidth = 1.5; ctx.beginPath();
        for (var q = view.from; q <= view.to; q++) ctx.lineTo(px(ts[q]), py(v[q]));
        ctx.stroke(); ctx.lineWidth = 1;
        ctx.fillStyle = color; ctx.fillRect(M.left + 10, M.top + 8 + 14 * k, 12, 4);
        ctx.fillStyle = "#222"; ctx.textAlign = "left"; ctx.fillText(label, M.left + 26, M.top + 14 + 14 * k);
      });
      ctx.strokeStyle = "#3c3c3c"; ctx.strokeRect(M.left, M.top, pw, ph);
      if (drag) { ctx.fillStyle = "rgba(0,0,0,0.08)"; ctx.fillRect(Math.min(drag.a, drag.b), M.top, Math.abs(drag.b - drag.a), ph); }
      return { px: px, t0: t0, t1: t1, pw: pw };
    }

    var geometry = draw();
    function indexAt(x) {
      var t = geometry.t0 + (x - M.left) / geometry.pw * (geometry.t1 - geometry.t0), best = view.from;
      for (var i = view.from; i <= view.to; i++) if (Math.abs(ts[i] - t) < Math.abs(ts[best] - t)) best = i;
      return best;
    }
    canvas.addEventListener("mousemove", function (e) {
      var x = e.offsetX, i = indexAt(x);
      if (drag) { drag.b = x; geometry = draw(); }
      var parts = [fmt(ts[i])];
      labels.forEach(function (label) { parts.push(label + "=" + island.values[label][i]); });
      Object.keys(island.indexes || {}).forEach(function (name) {
        var v = island.indexes[name][i]; if (v !== null) parts.push(name + "=" + v);
      });
      readout.textContent = parts.join("  ");
    });
    canvas.addEventListener("mousedown", function (e) { drag = { a: e.offsetX, b: e.offsetX }; });
    canvas.addEventListener("mouseup", function () {
      if (drag && Math.abs(drag.b - drag.a) > 4) {
        var a = indexAt(Math.min(drag.a, drag.b)), b = indexAt(Math.max(drag.a, drag.b));
        if (b > a) { view.from = a; view.to = b; }
      }
      drag = null; geometry = draw();
    });
    canvas.addEventListener("dblclick", function () { view.from = 0; view.to = n - 1; geometry = draw(); });
    return { redraw: function () { geometry = draw(); } };
  }

  var source = document.getElementById("chronoseries-data");
  var target = document.getElementById("chronoseries-chart");
  if (source && target) {
    var island = null;
    try { island = JSON.parse(source.textContent); } catch (e) { banner(target, "Invalid plot data: " + e.message); }
    if (island) mount(island, target);
  }
})();
