/**
 * Explorer state and its transitions. Everything here is pure: the loaded
 * document is never written to, and each transition returns a fresh state,
 * so reloading the same file always lands in an identical initial state.
 *
 * Filters compose by intersection: a node is rendered only if it passes
 * the community filter AND the time-window filter; a link is rendered only
 * if both endpoints are rendered and its own delay passes the window.
 */

import type { ExportDocument, ExportLink, ExportNode } from './schema';
import { validateDocument } from './schema';

export type ViewMode = 'interaction' | 'hashtag';
export type SizingMode = 'out_degree' | 'followers';

/** Retweet-delay window in seconds, inclusive on both ends. */
export interface TimeWindow {
  lo: number;
  hi: number;
}

export interface ExplorerState {
  doc: ExportDocument;
  view: ViewMode;
  sizing: SizingMode;
  /** Communities currently shown; starts as every id in the document. */
  visibleCommunities: ReadonlySet<number | null>;
  timeWindow: TimeWindow | null;
  selected: string | null;
}

/** Distinct community ids present in the document, nulls last. */
export function communityIds(doc: ExportDocument): (number | null)[] {
  const ids = new Set<number | null>();
  for (const node of doc.nodes) ids.add(node.community);
  const numbers = [...ids].filter((c): c is number => c !== null).sort((a, b) => a - b);
  return ids.has(null) ? [...numbers, null] : numbers;
}

export function loadDocument(raw: unknown): ExplorerState {
  const doc = validateDocument(raw);
  return {
    doc,
    view: 'interaction',
    sizing: 'out_degree',
    visibleCommunities: new Set(communityIds(doc)),
    timeWindow: null,
    selected: null,
  };
}

export function setView(state: ExplorerState, view: ViewMode): ExplorerState {
  return { ...state, view };
}

export function setSizing(state: ExplorerState, sizing: SizingMode): ExplorerState {
  return { ...state, sizing };
}

export function toggleCommunity(state: ExplorerState, id: number | null): ExplorerState {
  const next = new Set(state.visibleCommunities);
  if (next.has(id)) next.delete(id);
  else next.add(id);
  return { ...state, visibleCommunities: next };
}

export function showOnlyCommunity(state: ExplorerState, id: number | null): ExplorerState {
  return { ...state, visibleCommunities: new Set([id]) };
}

export function showAllCommunities(state: ExplorerState): ExplorerState {
  return { ...state, visibleCommunities: new Set(communityIds(state.doc)) };
}

export function setTimeWindow(state: ExplorerState, window: TimeWindow | null): ExplorerState {
  if (window && window.hi < window.lo) {
    window = { lo: window.hi, hi: window.lo };
  }
  return { ...state, timeWindow: window };
}

export function clearFilters(state: ExplorerState): ExplorerState {
  return setTimeWindow(showAllCommunities(state), null);
}

/** Select a node by id; unknown ids are a no-op, null clears. */
export function selectNode(state: ExplorerState, id: string | null): ExplorerState {
  if (id !== null && !state.doc.nodes.some((n) => n.id === id)) {
    return state;
  }
  return { ...state, selected: id };
}

/**
 * Radius for a node under the given sizing mode. The document carries both
 * precomputed sizes (sqrt scaling with a floor of 1), and every front end
 * is expected to use them as given so all renderings agree.
 */
export function nodeRadius(node: ExportNode, sizing: SizingMode): number {
  return sizing === 'out_degree' ? node.size_out_degree : node.size_followers;
}

/** Map of retweet id -> delay in seconds, from the document's links. */
export function retweetDelays(doc: ExportDocument): Map<string, number> {
  const delays = new Map<string, number>();
  for (const link of doc.links) delays.set(link.target, link.time_weight);
  return delays;
}

function inWindow(window: TimeWindow, delay: number): boolean {
  return delay >= window.lo && delay <= window.hi;
}

/** Nodes passing every active filter. */
export function visibleNodes(state: ExplorerState): ExportNode[] {
  const delays = retweetDelays(state.doc);
  return state.doc.nodes.filter((node) => {
    if (!state.visibleCommunities.has(node.community)) return false;
    if (state.timeWindow && node.kind === 'retweet') {
      const delay = delays.get(node.id);
      if (delay !== undefined && !inWindow(state.timeWindow, delay)) return false;
    }
    return true;
  });
}

/** Links whose endpoints are both visible and whose delay is in window. */
export function visibleLinks(state: ExplorerState): ExportLink[] {
  const shown = new Set(visibleNodes(state).map((n) => n.id));
  return state.doc.links.filter((link) => {
    if (!shown.has(link.source) || !shown.has(link.target)) return false;
    if (state.timeWindow && !inWindow(state.timeWindow, link.time_weight)) return false;
    return true;
  });
}

export interface NodeDetails {
  id: string;
  kind: 'original' | 'retweet';
  user: string | null;
  followers: number;
  label: number | null;
  probability: number | null;
  community: number | null;
  outDegree: number;
  unobserved: boolean;
  firstActivity: number;
  lastActivity: number;
}

/** Detail-panel data for one node; null when nothing is selected. */
export function nodeDetails(state: ExplorerState): NodeDetails | null {
  if (state.selected === null) return null;
  const node = state.doc.nodes.find((n) => n.id === state.selected);
  if (!node) return null;
  let first = node.timestamp;
  let last = node.timestamp;
  if (node.kind === 'original') {
    const byId = new Map(state.doc.nodes.map((n) => [n.id, n]));
    for (const link of state.doc.links) {
      if (link.source !== node.id) continue;
      const retweet = byId.get(link.target);
      if (retweet) {
        first = Math.min(first, retweet.timestamp);
        last = Math.max(last, retweet.timestamp);
      }
    }
  }
  return {
    id: node.id,
    kind: node.kind,
    user: node.user,
    followers: node.followers,
    label: node.label,
    probability: node.probability,
    community: node.community,
    outDegree: node.out_degree,
    unobserved: node.unobserved,
    firstActivity: first,
    lastActivity: last,
  };
}
