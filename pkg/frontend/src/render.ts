/**
 * SVG rendering for the explorer. The scene is rebuilt from state on every
 * call; d3-force runs on copies of the document's nodes, so the document
 * itself is never touched. Layout is computed synchronously (d3-force is
 * deterministic since v2), then optionally kept warm for drag interaction.
 */

import * as d3 from 'd3';
import type { ExportLink, ExportNode, HashtagLink, HashtagNode } from './schema';
import type { ExplorerState } from './state';
import { nodeRadius, visibleLinks, visibleNodes } from './state';

export const COLORS = {
  fake: '#d64550',
  real: '#3a7bd5',
  unknown: '#9aa0a6',
  link: '#b9c0c7',
  highlight: '#f2b134',
};

export function labelColor(label: number | null): string {
  if (label === 1) return COLORS.fake;
  if (label === 0) return COLORS.real;
  return COLORS.unknown;
}

export interface RenderOptions {
  width?: number;
  height?: number;
  /** Keep the simulation running for drag interaction (browser only). */
  animate?: boolean;
  onSelect?: (id: string | null) => void;
}

interface SimNode extends d3.SimulationNodeDatum {
  id: string;
  ref: ExportNode;
}

interface SimLink extends d3.SimulationLinkDatum<SimNode> {
  ref: ExportLink;
}

interface TagNode extends d3.SimulationNodeDatum {
  id: string;
  ref: HashtagNode;
}

interface TagLink extends d3.SimulationLinkDatum<TagNode> {
  ref: HashtagLink;
}

function clear(el: HTMLElement): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

function tooltipOn(tip: HTMLElement, html: string, x: number, y: number): void {
  tip.innerHTML = html;
  tip.style.display = 'block';
  tip.style.left = `${x + 12}px`;
  tip.style.top = `${y + 12}px`;
}

function tooltipOff(tip: HTMLElement): void {
  tip.style.display = 'none';
}

function fmtTime(ts: number): string {
  return new Date(ts * 1000).toISOString().replace('T', ' ').replace('Z', ' UTC');
}

/** Render the active view into the container. Returns the created SVG. */
export function renderScene(container: HTMLElement, state: ExplorerState,
                            options: RenderOptions = {}): SVGSVGElement {
  const width = options.width ?? 1200;
  const height = options.height ?? 800;
  clear(container);

  const svg = d3.select(container).append('svg')
    .attr('class', 'scene')
    .attr('viewBox', `0 0 ${width} ${height}`)
    .attr('preserveAspectRatio', 'xMidYMid meet');
  const tip = document.createElement('div');
  tip.className = 'tooltip';
  tip.style.display = 'none';
  container.appendChild(tip);

  svg.on('click', () => options.onSelect?.(null));

  if (state.view === 'hashtag') {
    renderHashtagView(svg, state, tip, width, height, options);
  } else {
    renderInteractionView(svg, state, tip, width, height, options);
  }
  return svg.node() as SVGSVGElement;
}

function renderInteractionView(svg: d3.Selection<SVGSVGElement, unknown, null, undefined>,
                               state: ExplorerState, tip: HTMLElement,
                               width: number, height: number,
                               options: RenderOptions): void {
  const nodes: SimNode[] = visibleNodes(state).map((n) => ({ id: n.id, ref: n }));
  const links: SimLink[] = visibleLinks(state).map((l) => ({
    source: l.source, target: l.target, ref: l,
  }));

  const sim = d3.forceSimulation<SimNode>(nodes)
    .force('link', d3.forceLink<SimNode, SimLink>(links).id((d) => d.id).distance(28))
    .force('charge', d3.forceManyBody().strength(-35))
    .force('center', d3.forceCenter(width / 2, height / 2))
    .force('collide', d3.forceCollide<SimNode>((d) => nodeRadius(d.ref, state.sizing) + 1.5))
    .stop();
  sim.tick(200);

  const linkSel = svg.append('g').attr('class', 'links')
    .selectAll('line').data(links).join('line')
    .attr('class', 'link')
    .attr('stroke', COLORS.link)
    .attr('stroke-width', 1)
    .attr('data-time-weight', (d) => d.ref.time_weight)
    .attr('x1', (d) => (d.source as SimNode).x ?? 0)
    .attr('y1', (d) => (d.source as SimNode).y ?? 0)
    .attr('x2', (d) => (d.target as SimNode).x ?? 0)
    .attr('y2', (d) => (d.target as SimNode).y ?? 0);

  linkSel
    .on('mouseover', function (event: MouseEvent, d: SimLink) {
      d3.select(this).attr('stroke', COLORS.highlight).attr('stroke-width', 2);
      tooltipOn(tip, `retweeted after ${d.ref.time_weight}s`, event.pageX, event.pageY);
    })
    .on('mouseout', function () {
      d3.select(this).attr('stroke', COLORS.link).attr('stroke-width', 1);
      tooltipOff(tip);
    });

  const nodeSel = svg.append('g').attr('class', 'nodes')
    .selectAll<SVGCircleElement, SimNode>('circle').data(nodes).join('circle')
    .attr('class', (d) => `node kind-${d.ref.kind}`)
    .attr('data-id', (d) => d.id)
    .attr('r', (d) => nodeRadius(d.ref, state.sizing))
    .attr('fill', (d) => labelColor(d.ref.label))
    .attr('fill-opacity', 0.85)
    .attr('stroke', (d) => (d.id === state.selected ? COLORS.highlight : '#ffffff'))
    .attr('stroke-width', (d) => (d.id === state.selected ? 3 : 1))
    .attr('stroke-dasharray', (d) => (d.ref.unobserved ? '3,2' : null))
    .attr('cx', (d) => d.x ?? 0)
    .attr('cy', (d) => d.y ?? 0);

  nodeSel
    .on('click', (event: MouseEvent, d: SimNode) => {
      event.stopPropagation();
      options.onSelect?.(d.id);
    })
    .on('mouseover', (event: MouseEvent, d: SimNode) => {
      const n = d.ref;
      const prob = n.probability === null ? 'n/a' : n.probability.toFixed(3);
      tooltipOn(tip,
        `<b>${n.id}</b> (${n.kind}${n.unobserved ? ', unobserved' : ''})<br>` +
        `user ${n.user ?? 'unknown'}, ${n.followers} followers<br>` +
        `${fmtTime(n.timestamp)}<br>` +
        `p(fake) ${prob}, retweets ${n.out_degree}`,
        event.pageX, event.pageY);
    })
    .on('mouseout', () => tooltipOff(tip));

  if (options.animate) {
    sim.on('tick', () => {
      linkSel
        .attr('x1', (d) => (d.source as SimNode).x ?? 0)
        .attr('y1', (d) => (d.source as SimNode).y ?? 0)
        .attr('x2', (d) => (d.target as SimNode).x ?? 0)
        .attr('y2', (d) => (d.target as SimNode).y ?? 0);
      nodeSel.attr('cx', (d) => d.x ?? 0).attr('cy', (d) => d.y ?? 0);
    });
    nodeSel.call(d3.drag<SVGCircleElement, SimNode>()
      .on('start', (event, d) => {
        if (!event.active) sim.alphaTarget(0.25).restart();
        d.fx = d.x;
        d.fy = d.y;
      })
      .on('drag', (event, d) => {
        d.fx = event.x;
        d.fy = event.y;
      })
      .on('end', (event, d) => {
        if (!event.active) sim.alphaTarget(0);
        d.fx = null;
        d.fy = null;
      }));
  }
}

function renderHashtagView(svg: d3.Selection<SVGSVGElement, unknown, null, undefined>,
                           state: ExplorerState, tip: HTMLElement,
                           width: number, height: number,
                           _options: RenderOptions): void {
  const nodes: TagNode[] = state.doc.hashtag_nodes.map((h) => ({ id: h.id, ref: h }));
  const links: TagLink[] = state.doc.hashtag_links.map((l) => ({
    source: l.source, target: l.target, ref: l,
  }));

  const sim = d3.forceSimulation<TagNode>(nodes)
    .force('link', d3.forceLink<TagNode, TagLink>(links).id((d) => d.id).distance(90))
    .force('charge', d3.forceManyBody().strength(-180))
    .force('center', d3.forceCenter(width / 2, height / 2))
    .stop();
  sim.tick(200);

  svg.append('g').attr('class', 'tag-links')
    .selectAll('line').data(links).join('line')
    .attr('class', 'tag-link')
    .attr('stroke', COLORS.link)
    .attr('stroke-width', (d) => Math.sqrt(d.ref.weight))
    .attr('x1', (d) => (d.source as TagNode).x ?? 0)
    .attr('y1', (d) => (d.source as TagNode).y ?? 0)
    .attr('x2', (d) => (d.target as TagNode).x ?? 0)
    .attr('y2', (d) => (d.target as TagNode).y ?? 0)
    .on('mouseover', (event: MouseEvent, d: TagLink) => {
      tooltipOn(tip, `${d.ref.weight} tweets share both tags`, event.pageX, event.pageY);
    })
    .on('mouseout', () => tooltipOff(tip));

  // label size follows usage count, sqrt so heavy tags do not drown the rest
  svg.append('g').attr('class', 'tag-nodes')
    .selectAll('text').data(nodes).join('text')
    .attr('class', 'tag')
    .attr('data-id', (d) => d.id)
    .attr('font-size', (d) => 10 + 3 * Math.sqrt(d.ref.count))
    .attr('text-anchor', 'middle')
    .attr('x', (d) => d.x ?? 0)
    .attr('y', (d) => d.y ?? 0)
    .text((d) => `#${d.id}`)
    .on('mouseover', (event: MouseEvent, d: TagNode) => {
      tooltipOn(tip, `#${d.id}: used ${d.ref.count} times`, event.pageX, event.pageY);
    })
    .on('mouseout', () => tooltipOff(tip));
}

/**
 * Bucketed virality bars: fake and real side by side per bucket, the active
 * time window shaded, and the crossing moment marked when present.
 */
export function renderTimeline(container: HTMLElement, state: ExplorerState,
                               options: { width?: number; height?: number } = {}): void {
  const width = options.width ?? 1200;
  const height = options.height ?? 110;
  clear(container);
  const trend = state.doc.trend;
  const buckets = trend.fake.length;
  const svg = d3.select(container).append('svg')
    .attr('class', 'timeline')
    .attr('viewBox', `0 0 ${width} ${height}`)
    .attr('preserveAspectRatio', 'none');
  if (buckets === 0 || trend.start === null) {
    svg.append('text').attr('x', 8).attr('y', 20).attr('class', 'timeline-empty')
      .text('no retweet activity');
    return;
  }

  const margin = 18;
  const plotW = width - 2 * margin;
  const plotH = height - 24;
  const barW = plotW / buckets;
  const peak = Math.max(1, ...trend.fake, ...trend.real);
  const y = (v: number) => plotH * (v / peak);

  if (state.timeWindow) {
    // window is in seconds since the story start, same axis as the buckets
    const toX = (sec: number) =>
      margin + Math.max(0, Math.min(buckets, sec / trend.bucket_seconds)) * barW;
    svg.append('rect').attr('class', 'window')
      .attr('x', toX(state.timeWindow.lo))
      .attr('width', Math.max(1, toX(state.timeWindow.hi) - toX(state.timeWindow.lo)))
      .attr('y', 2).attr('height', plotH)
      .attr('fill', COLORS.highlight).attr('fill-opacity', 0.25);
  }

  const enter = svg.append('g');
  trend.fake.forEach((v, i) => {
    enter.append('rect').attr('class', 'bar-fake')
      .attr('x', margin + i * barW + 1)
      .attr('width', Math.max(1, barW / 2 - 1))
      .attr('y', 2 + plotH - y(v)).attr('height', y(v))
      .attr('fill', COLORS.fake);
    const r = trend.real[i] ?? 0;
    enter.append('rect').attr('class', 'bar-real')
      .attr('x', margin + i * barW + barW / 2)
      .attr('width', Math.max(1, barW / 2 - 1))
      .attr('y', 2 + plotH - y(r)).attr('height', y(r))
      .attr('fill', COLORS.real);
  });

  if (trend.viral_at !== null) {
    const x = margin + ((trend.viral_at - trend.start) / trend.bucket_seconds) * barW;
    svg.append('line').attr('class', 'viral-marker')
      .attr('x1', x).attr('x2', x).attr('y1', 0).attr('y2', plotH + 4)
      .attr('stroke', COLORS.fake).attr('stroke-width', 2).attr('stroke-dasharray', '4,3');
  }

  svg.append('text').attr('x', margin).attr('y', height - 6).attr('class', 'timeline-label')
    .text(`${buckets} buckets of ${trend.bucket_seconds}s from ${fmtTime(trend.start)}`);
}

/** Fill the detail panel for the selected node, or empty it. */
export function renderDetails(container: HTMLElement, state: ExplorerState): void {
  clear(container);
  const nodeId = state.selected;
  if (nodeId === null) return;
  const node = state.doc.nodes.find((n) => n.id === nodeId);
  if (!node) return;

  let first = node.timestamp;
  let last = node.timestamp;
  if (node.kind === 'original') {
    const byId = new Map(state.doc.nodes.map((n) => [n.id, n]));
    for (const link of state.doc.links) {
      if (link.source !== node.id) continue;
      const rt = byId.get(link.target);
      if (rt) {
        first = Math.min(first, rt.timestamp);
        last = Math.max(last, rt.timestamp);
      }
    }
  }
  const rows: [string, string][] = [
    ['id', node.id],
    ['kind', node.kind + (node.unobserved ? ' (unobserved)' : '')],
    ['user', node.user ?? 'unknown'],
    ['followers', String(node.followers)],
    ['label', node.label === null ? 'n/a' : node.label === 1 ? 'fake' : 'real'],
    ['p(fake)', node.probability === null ? 'n/a' : node.probability.toFixed(3)],
    ['community', node.community === null ? 'n/a' : String(node.community)],
    ['retweets', String(node.out_degree)],
    ['first activity', fmtTime(first)],
    ['last activity', fmtTime(last)],
  ];
  const dl = document.createElement('dl');
  dl.className = 'details';
  for (const [k, v] of rows) {
    const dt = document.createElement('dt');
    dt.textContent = k;
    const dd = document.createElement('dd');
    dd.textContent = v;
    dl.appendChild(dt);
    dl.appendChild(dd);
  }
  container.appendChild(dl);
}
